const { program } = require('commander');
const chalk = require('chalk');
const fs = require('fs');
const local = require('./local');
